int main()
{
int i;
int k;
int n;
int x;
int a[100];
scanf("%d", &n);
scanf("%d", &x);
for (i = 0; i < n; i++)
    scanf("%d", &a[i]);
return 0;
}
