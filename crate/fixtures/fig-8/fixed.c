int main()
{
int c;
int n[1000];
int a[500];
int nm;
int i;
int j;
int ln;
int flag = 0;
scanf("%d", &nm);
scanf("%d", &ln);
for (i = 0; i < 500; i++)
{
    a[i] = 0;
}
for (i = 0; i < nm; i++)
{
    scanf("%d", &n[i]);
    c = n[i];
}
return 0;
}
