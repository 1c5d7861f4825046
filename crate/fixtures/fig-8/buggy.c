int main()
{
int n[1000],a[500],nm,i,j,ln,flag=0;
scanf("%d",&nm);
scanf("%d",&ln);
for(i=0;i<500;i++)
{
    a[i]=0;
}
for(i=0;i<nm;i++)
{
    scanf("%d",&n[i]);
    c=n[i];
}
return 0;
}
